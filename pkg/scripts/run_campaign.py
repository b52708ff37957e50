"""
Campaign CLI Runner
===================

Run a full offline-vs-online testing campaign from the repository root.

Usage:
    python scripts/run_campaign.py                          # Defaults, 50 scenarios
    python scripts/run_campaign.py --seed 7 --jobs 4        # Another seed, 4 workers
    python scripts/run_campaign.py --config campaign.json   # Settings from a file
"""

import sys
from pathlib import Path

# Add the repository root to path BEFORE other imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from lanebench.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main(["campaign", *sys.argv[1:]]))
