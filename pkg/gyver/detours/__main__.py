import sys

from gyver.detours.cli import main

sys.exit(main())
