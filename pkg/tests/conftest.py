from importlib import resources

import pytest

from wordmark import Lexicon, LexiconKind, SubstitutionGroup, WatermarkKey

# Frozen test keys. DEMO_KEY was chosen so the (great -> outstanding) group
# selects index 1 (the substitute); IDENTITY_KEY selects index 0 for the
# same group. BALANCED_KEY keeps the 500-group synthetic fixture's index-0
# rate at its theoretical mean, so fixed-key null-calibration checks are not
# skewed by an unlucky draw.
KEY16 = WatermarkKey(b"0123456789abcdef")
DEMO_KEY = WatermarkKey(b"wm-demo-key-0000")
IDENTITY_KEY = WatermarkKey(b"wm-identity-key-000")
BALANCED_KEY = WatermarkKey(b"wm-acceptance-balanced-key-00042")

DATA_DIR = resources.files("wordmark") / "data"


@pytest.fixture
def demo_key():
    return DEMO_KEY


@pytest.fixture
def great_group():
    return SubstitutionGroup("great", ("outstanding",), LexiconKind.SYNONYM)


@pytest.fixture
def great_lexicon(great_group):
    return Lexicon((great_group,), 1, LexiconKind.SYNONYM)


@pytest.fixture
def small_lexicon():
    groups = (
        SubstitutionGroup("great", ("bang-up", "smashing"), LexiconKind.SYNONYM),
        SubstitutionGroup("new", ("novel", "newfound"), LexiconKind.SYNONYM),
        SubstitutionGroup("good", ("estimable", "virtuous"), LexiconKind.SYNONYM),
    )
    return Lexicon(groups, 2, LexiconKind.SYNONYM)
