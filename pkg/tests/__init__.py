"Tests for qeslab."
