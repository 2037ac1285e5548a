import sys

from finite_qrf.cli import main

sys.exit(main())
