import sys

from lanmpc.cli import main

sys.exit(main())
