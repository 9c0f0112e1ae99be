import sys

from rental_harmony.cli import main

sys.exit(main())
