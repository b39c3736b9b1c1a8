import sys

from alphabp.cli import main

sys.exit(main())
