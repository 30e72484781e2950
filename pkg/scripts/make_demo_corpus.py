#!/usr/bin/env python3
"""Write the synthetic demonstration corpus and validate it.

Usage: python scripts/make_demo_corpus.py --out data/demo [--seed 7]
"""

import sys

from handscroll.demo import main

if __name__ == "__main__":
    sys.exit(main())
