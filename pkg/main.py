# main.py
import sys

from cslbounds.cli import run


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
