# -*- coding: utf-8 -*-
"""
ZidLab — Script entry point.

Plain launcher for running from a checkout without installing. Keep
this thin; it just boots the package.
"""

from zidlab_pkg import main

if __name__ == "__main__":
    main()
