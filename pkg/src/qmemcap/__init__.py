"""Classical capacity of quantum channels with long-term memory."""
