"""Sound but incomplete verification of strategic properties on concurrent
game structures with imperfect information and perfect recall."""
