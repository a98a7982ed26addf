"""Independent reference implementations used only by the test suite.

Everything in this package is written as a direct, term-by-term transcription
of the published formulas, with no imports from ``vesselnoise``.  The point is
to have a second, independently derived answer for every closed-form quantity
the library computes, so the tests compare two implementations that share no
code.  Keep it that way: do not import the library from here, and do not
"simplify" these functions to match the library's algebra.
"""
