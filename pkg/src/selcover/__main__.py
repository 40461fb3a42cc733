import sys

from selcover.cli import main

sys.exit(main())
