"""alphaform: symbolic α_Γ forms of Feynman graphs."""
