import sys

from ._nyspcg import main

if __name__ == '__main__':
    sys.exit(main())
