"""eqlab: weighted equidistribution mod 1, symbolically decided and numerically verified.

The package is organized around one symbolic engine and several numeric
verification engines:

- ``eqlab.lefn``     exact engine for sums of terms c * x^a0 * prod_j (log^(j) x)^aj,
                     with growth comparison and the weighted-equidistribution
                     decision procedure
- ``eqlab.primes``   segmented sieve, primes in arithmetic progressions,
                     classical prime bounds
- ``eqlab.weights``  weight schemes w = W' with closed-form normalization
- ``eqlab.equidist`` weighted Weyl sums, star discrepancy, difference probes,
                     prime substitution and perturbation checks
- ``eqlab.benford``  exact mantissa accumulators and digit-law tables
- ``eqlab.ergodic``  diagonal unitary averages and recurrence probes
- ``eqlab.cli``      command-line front end emitting CSV/JSON artifacts
"""

__version__ = "0.1.0"
