"""Allow `python -m signlda`."""

from .cli import main

if __name__ == "__main__":
    main()
