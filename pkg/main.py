"""
tablegnn - column type annotation by message passing over table column graphs
"""
import sys

from dotenv import load_dotenv

from tablegnn import main


if __name__ == "__main__":
    # LOG_LEVEL may come from .env; logging is configured inside main()
    load_dotenv()
    sys.exit(main())
