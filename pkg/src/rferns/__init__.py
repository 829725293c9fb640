"""Random ferns classifier with embedded all-relevant feature selection."""
