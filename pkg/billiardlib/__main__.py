import sys

from billiardlib.cli import main

sys.exit(main())
