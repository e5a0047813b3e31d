#!/usr/bin/env python3
"""Check and run every example program, printing one line per file.

Programs whose names appear in EXPECT_REJECT are counterexamples: the
typechecker is supposed to refuse them, and doing so counts as success.
"""

from __future__ import annotations

import pathlib
import sys

from ordlang import TypeCheckError, check_program, parse, run
from ordlang.core import pretty, show_type
from ordlang.opm import get_opm
from ordlang.surface import ParseError

ROOT = pathlib.Path(__file__).resolve().parent.parent
EXPECT_REJECT = {"misuse.ord", "alias_bad.ord"}


def main() -> int:
    opm = get_opm("regex")
    failures = 0
    for path in sorted(ROOT.glob("programs/**/*.ord")):
        rel = path.relative_to(ROOT)
        expect_reject = path.name in EXPECT_REJECT
        try:
            checked = check_program(parse(path.read_text(), opm), opm)
        except (TypeCheckError, ParseError) as exc:
            kind = getattr(exc, "kind", "parse-error")
            if expect_reject:
                print(f"{rel}: rejected as intended ({kind})")
            else:
                print(f"{rel}: UNEXPECTED REJECTION ({kind}: {exc})")
                failures += 1
            continue
        if expect_reject:
            print(f"{rel}: UNEXPECTEDLY ACCEPTED")
            failures += 1
            continue
        result = run(checked.core, opm, paranoid=True)
        clean = (
            result.outcome == "value"
            and not result.config.heap
            and not result.violations
        )
        if clean:
            print(
                f"{rel}: {show_type(checked.type, opm)} | effect {checked.effect} "
                f"| {len(result.steps)} steps -> {pretty(result.config.term, opm)}"
            )
        else:
            print(f"{rel}: RUN FAILED ({result.outcome}, heap={result.config.heap})")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
