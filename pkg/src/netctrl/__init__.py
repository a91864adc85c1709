"""Target controllability of leader/follower networks on weighted digraphs."""

__version__ = "0.1.0"
