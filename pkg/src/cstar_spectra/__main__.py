"""Allow running as: python -m cstar_spectra"""

from . import main

if __name__ == "__main__":
    main()
