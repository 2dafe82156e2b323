"""Field-level tokenization of EdgeList text."""

NEWLINE = "\n"
STOP = "<stop>"
RESERVED = (NEWLINE, STOP)


def tokenize(text: str) -> list[str]:
    """Split on single spaces within lines; every line ends in ``NEWLINE``."""
    tokens = []
    lines = text.split("\n")
    for i, line in enumerate(lines):
        if line:
            tokens.extend(line.split(" "))
        if i < len(lines) - 1:
            tokens.append(NEWLINE)
    return tokens


def detokenize(tokens) -> str:
    parts = []
    at_line_start = True
    for tok in tokens:
        if tok == STOP:
            continue
        if tok == NEWLINE:
            parts.append("\n")
            at_line_start = True
            continue
        if not at_line_start:
            parts.append(" ")
        parts.append(tok)
        at_line_start = False
    return "".join(parts)
