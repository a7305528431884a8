import sys
from pathlib import Path

# Let test modules import the shared oracles regardless of pytest import mode.
sys.path.insert(0, str(Path(__file__).resolve().parent))
