import sys

from modules.experiments.cli import main as shapeopt_main

if __name__ == "__main__":
    raise SystemExit(shapeopt_main(sys.argv[1:]))
