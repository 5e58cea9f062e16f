"""Startpunkt: ``python src/main.py run --suite identities``."""
from cli import main

if __name__ == "__main__":
    raise SystemExit(main())
