#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from Python's unicodedata.

    python3 tools/gen_unicode_tables.py > src/unicode_tables.inc

Tables: general category P* ranges, general category Nd ranges, and the
simple (one-to-one) lowercase mapping.
"""
import sys
import unicodedata

MAX_CP = 0x110000


def ranges(pred):
    out, start = [], None
    for cp in range(MAX_CP):
        hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def simple_lower(cp):
    if cp == 0x0130:  # full mapping is two code points; simple mapping is U+0069
        return 0x0069
    low = chr(cp).lower()
    return ord(low) if len(low) == 1 else cp


def main():
    punct = ranges(lambda cp: unicodedata.category(chr(cp)).startswith("P"))
    digits = ranges(lambda cp: unicodedata.category(chr(cp)) == "Nd")
    lower = [(cp, simple_lower(cp)) for cp in range(MAX_CP) if simple_lower(cp) != cp]
    for _, lo in lower:
        assert simple_lower(lo) == lo, "lowercase mapping must be idempotent"

    w = sys.stdout.write
    w("// Generated by tools/gen_unicode_tables.py from Unicode %s. Do not edit.\n"
      % unicodedata.unidata_version)
    w("// clang-format off\n")
    w("constexpr CodeRange kPunctuation[] = {\n")
    for lo, hi in punct:
        w("  {0x%04X, 0x%04X},\n" % (lo, hi))
    w("};\n\n")
    w("constexpr CodeRange kDecimalDigits[] = {\n")
    for lo, hi in digits:
        w("  {0x%04X, 0x%04X},\n" % (lo, hi))
    w("};\n\n")
    w("constexpr CaseMapping kLowercase[] = {\n")
    for up, lo in lower:
        w("  {0x%04X, 0x%04X},\n" % (up, lo))
    w("};\n")
    w("// clang-format on\n")


if __name__ == "__main__":
    main()
