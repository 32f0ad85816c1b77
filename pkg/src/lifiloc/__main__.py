import sys

from lifiloc.cli import main

sys.exit(main())
