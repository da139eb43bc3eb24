"""Matcher server entry point: ``python3 -m flowmatch.serve``.

Reads framed requests from stdin and writes framed responses to stdout; see
:mod:`flowmatch.ffi` for the wire format.
"""

import sys

from .ffi import main

if __name__ == "__main__":
    sys.exit(main())
