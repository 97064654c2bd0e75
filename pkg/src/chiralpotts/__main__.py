import sys

from chiralpotts.cli import main

sys.exit(main())
