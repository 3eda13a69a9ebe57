import sys

from linkcomm.cli import main

sys.exit(main())
