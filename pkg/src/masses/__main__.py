import sys

from masses.cli import main

sys.exit(main())
