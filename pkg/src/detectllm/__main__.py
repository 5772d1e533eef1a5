import sys

from detectllm.cli import main

sys.exit(main())
