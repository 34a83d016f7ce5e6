from rctprep.tokenizer import tokenize


def test_plain_words():
    assert tokenize("patients were randomized") == ["patients", "were", "randomized"]

def test_trailing_period_peeled():
    assert tokenize("pain decreased.") == ["pain", "decreased", "."]

def test_comma_and_parens():
    assert tokenize("massage (or rest), daily") == ["massage", "(", "or", "rest", ")", ",", "daily"]

def test_decimal_kept_whole():
    assert tokenize("p was 0.05.") == ["p", "was", "0.05", "."]

def test_percent_peeled():
    assert tokenize("adherence was 85%") == ["adherence", "was", "85", "%"]

def test_hyphen_kept():
    assert tokenize("follow-up visit") == ["follow-up", "visit"]

def test_pre_tokenized_text_unchanged():
    text = "A total of 60 adults were randomized ."
    assert tokenize(text) == text.split()

def test_empty_and_whitespace():
    assert tokenize("") == []
    assert tokenize("   ") == []

def test_lone_punctuation_survives():
    assert tokenize(". . .") == [".", ".", "."]
