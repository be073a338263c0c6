"""Posted-pricing mechanisms for online combinatorial auctions with production costs."""
