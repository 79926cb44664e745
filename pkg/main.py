#!/usr/bin/env python3
"""
Main entry point for the Scrivener command-line toolkit
"""

from scrivener.cli.main import main

if __name__ == "__main__":
    main()
