"""Graph, polynomial, Dodgson, form and α_Γ engines."""
