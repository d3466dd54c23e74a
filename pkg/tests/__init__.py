# Tests for syzlab.
