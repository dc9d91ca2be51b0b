# -*- coding: utf-8 -*-
"""
ZidLab — Main entry point.

Allows running with: python -m zidlab_pkg
"""

from . import main

if __name__ == "__main__":
    main()
