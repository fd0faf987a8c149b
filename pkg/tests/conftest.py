import sys
from pathlib import Path

# allow cross-importing helpers between test modules (e.g. one_hot_table)
sys.path.insert(0, str(Path(__file__).parent))
