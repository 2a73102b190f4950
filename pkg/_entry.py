# PyInstaller entry point - uses absolute imports to avoid relative import errors
import sys

from credal_lln.main import main

if __name__ == "__main__":
    sys.exit(main())
