# ski rental, 3 days left, over TROP6 (costs up to 5 are exact)
semiring TROP6
actions a b
tests p
states 0 1 2 3
rel a 1 0 0
rel a 2 1 0
rel a 3 2 0
rel b 0 0 0
rel b 1 0 0
rel b 2 0 0
rel b 3 0 0
sat p 1 2 3
