"""Testing module of spfacility."""
