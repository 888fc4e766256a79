import sys

from adf.cli import main

sys.exit(main())
