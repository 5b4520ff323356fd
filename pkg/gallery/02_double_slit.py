# Two slits on a 1-d lattice: amplitudes add, probabilities do not.
from pathrun import ActionFunctional, WeightFunction, double_slit

WIDTH, FRAMES, SLIT_FRAME, SLITS = 15, 8, 4, (5, 9)

res = double_slit(WIDTH, FRAMES, SLIT_FRAME, SLITS, WeightFunction.feynman(1.0), ActionFunctional(mass=1.0))

print("K_both - (K_left + K_right), worst cell:", res.linearity_max_err)
print()
print(" x   both    left+right (incoherent)")
for x in range(WIDTH):
    pb, pc = res.p_both[x], res.classical_add[x]
    print(f"{x:2d}  {pb:.4f}  {pc:.4f}  {'#' * round(60 * pb):<20s}|{'.' * round(60 * pc)}")
print("\nlargest interference term:", round(res.interference_max, 4))
