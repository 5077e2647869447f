"""Test suite for the pricequery package."""
