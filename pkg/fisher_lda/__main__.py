import sys

from .cli.standalone_runner import main

sys.exit(main())
