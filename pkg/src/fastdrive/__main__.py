"""``python -m fastdrive``."""

import sys

from .cli import main

sys.exit(main())
