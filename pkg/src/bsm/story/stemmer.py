"""Porter suffix-stripping stemmer, implemented from the original rule tables.

Pure and dependency-free so that concept coverage stays deterministic.
Words of one or two letters are returned unchanged.
"""

from __future__ import annotations

_VOWELS = frozenset("aeiou")


def _forms(word: str) -> str:
    """Consonant/vowel form string: 'y' is a vowel only after a consonant."""
    out = []
    for i, ch in enumerate(word):
        if ch in _VOWELS:
            out.append("v")
        elif ch == "y" and i > 0 and out[i - 1] == "c":
            out.append("v")
        else:
            out.append("c")
    return "".join(out)


def _measure(stem: str) -> int:
    """Number of vowel->consonant transitions ([C](VC)^m[V] gives m)."""
    forms = _forms(stem)
    collapsed = []
    for ch in forms:
        if not collapsed or collapsed[-1] != ch:
            collapsed.append(ch)
    return "".join(collapsed).count("vc")


def _contains_vowel(stem: str) -> bool:
    return "v" in _forms(stem)


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _forms(word)[-1] == "c"


def _ends_cvc(word: str) -> bool:
    """Ends consonant-vowel-consonant where the final consonant is not w, x, y."""
    return len(word) >= 3 and _forms(word)[-3:] == "cvc" and word[-1] not in "wxy"


def _longest_suffix_rule(word: str, rules: list[tuple[str, str]]) -> tuple[str, str] | None:
    """Pick the rule with the longest suffix matching the word's end.

    Per the algorithm, that match decides the step: if its measure
    condition then fails, no other rule of the step applies.
    """
    best = None
    for suffix, replacement in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, replacement)
    return best


def _step_1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step_1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    if word.endswith("ed") and _contains_vowel(word[:-2]):
        word = word[:-2]
    elif word.endswith("ing") and _contains_vowel(word[:-3]):
        word = word[:-3]
    else:
        return word
    # cleanup after a bare -ed / -ing removal
    if word.endswith(("at", "bl", "iz")):
        return word + "e"
    if _ends_double_consonant(word) and word[-1] not in "lsz":
        return word[:-1]
    if _measure(word) == 1 and _ends_cvc(word):
        return word + "e"
    return word


def _step_1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_STEP_2_RULES = [
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
]

_STEP_3_RULES = [
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
]

_STEP_4_SUFFIXES = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def _step_2(word: str) -> str:
    rule = _longest_suffix_rule(word, _STEP_2_RULES)
    if rule is not None:
        suffix, replacement = rule
        stem = word[: -len(suffix)]
        if _measure(stem) > 0:
            return stem + replacement
    return word


def _step_3(word: str) -> str:
    rule = _longest_suffix_rule(word, _STEP_3_RULES)
    if rule is not None:
        suffix, replacement = rule
        stem = word[: -len(suffix)]
        if _measure(stem) > 0:
            return stem + replacement
    return word


def _step_4(word: str) -> str:
    best = None
    for suffix in _STEP_4_SUFFIXES:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is not None:
        stem = word[: -len(best)]
        if _measure(stem) > 1 and (best != "ion" or stem.endswith(("s", "t"))):
            return stem
    return word


def _step_5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step_5b(word: str) -> str:
    if word.endswith("ll") and _measure(word) > 1:
        return word[:-1]
    return word


def stem(word: str) -> str:
    """Stem one lowercase word; non-alphabetic tokens pass through untouched."""
    word = word.lower()
    if len(word) <= 2 or not word.isalpha():
        return word
    word = _step_1a(word)
    word = _step_1b(word)
    word = _step_1c(word)
    word = _step_2(word)
    word = _step_3(word)
    word = _step_4(word)
    word = _step_5a(word)
    return _step_5b(word)
