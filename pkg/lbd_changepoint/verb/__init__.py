# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

import sys


def _paint(code, text, file=None):
    print(f"\033[{code}m", text, "\033[0m", sep="", file=file or sys.stdout)


def red(text, file=None):
    _paint(31, text, file)


def green(text, file=None):
    _paint(32, text, file)


def yellow(text, file=None):
    _paint(33, text, file)


def gray(text, file=None):
    _paint(90, text, file)
