"""Dictionary-sparse phase retrieval toolkit."""
