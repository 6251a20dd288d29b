import sys

from qg3.cli import main

sys.exit(main())
