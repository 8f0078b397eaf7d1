import sys

from raretrans.cli import main

sys.exit(main())
