"""
Allow running qoffload as a module: python -m qoffload
"""

from qoffload.cli import run_cli

if __name__ == "__main__":
    run_cli()
