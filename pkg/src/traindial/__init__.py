"""Task-oriented spoken dialogue stack for train timetable inquiry.

The pipeline mirrors a classic telephone dialogue system at desk scale:
a seeded noisy channel stands in for the acoustic front-end, a class-bigram
language model guides slot-synchronous decoding over confusion networks,
a robust partial parser turns decoded words into case frames, and an
expectation-driven dialogue manager collects the four query parameters
(departure, arrival, date, time) and answers from a timetable database.
"""

__version__ = "0.1.0"
