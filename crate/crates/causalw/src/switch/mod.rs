//! Quantum switch (under construction).
