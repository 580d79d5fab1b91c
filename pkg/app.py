"""
Anatomy Contrastive Lab - Main Application

Usage:
    python app.py [--config run.toml] [--seed N] [--out DIR] [--dry-run] <command> ...

Commands: synth, train, eval, diagnose, gradcheck, ablation (see --help of each).
"""

from src.cli.commands import cli


def main():
    """Main application function."""
    cli(prog_name="anatomy-lab")


if __name__ == "__main__":
    main()
