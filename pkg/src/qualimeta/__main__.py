import sys

from qualimeta.cli import main

sys.exit(main())
