import sys

from fmus_cubic.cli import main

sys.exit(main())
