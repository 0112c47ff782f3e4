"""
Hierarchical Driving Benchmark - Main Entry Point
---------------------------------------------------
Closed-loop driving benchmark with a language-command hierarchy.

Usage:
    python main.py run --suite suites/langauto_tiny.json
    python main.py score output/langauto_tiny
    python main.py config show

Author: Mehmet Demir
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
