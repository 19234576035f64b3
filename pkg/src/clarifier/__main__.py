import sys

from clarifier.cli import main

sys.exit(main())
