//! Green functions and Gaussian propagation (under construction).
