"""Local index density toolkit: exterior and Clifford algebra, Getzler rescaling, Mehler kernels."""
