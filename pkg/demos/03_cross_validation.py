"""Pick the l1 weight by stratified cross-validation over the automatic grid.

The grid spans lambda_bar / 2^c for c = 9..-3, where lambda_bar comes from
the ridge solution of the first-direction subproblem.  A value is admissible
while its fitted models keep at most 15% nonzero features; among admissible
values the fewest mean validation errors win, ties going to the sparser
(larger) weight.
"""

from sosda import (CvSpec, SosFitConfig, SynthSpec, cross_validate, evaluate,
                   fit_sos, predict, sample_type1)

spec = SynthSpec("type1", p=300, K=2, r=0.3, n_train_per_class=25,
                 n_test_per_class=100, seed=11)
train, test = sample_type1(spec)

base = SosFitConfig(lam=0.0, q=1, solver="sdaap", seed=11)
result = cross_validate(train, CvSpec(base, folds=5, sparsity_cap=0.15, seed=11))

print(f"lambda_bar = {result.lambda_bar:.4f}\n")
print(f"{'lambda':>10} {'mean err':>9} {'mean fracFeats':>15} {'admissible':>11}")
for rec in result.records:
    mark = " <-- chosen" if rec["lambda"] == result.chosen_lambda else ""
    print(f"{rec['lambda']:>10.4f} {rec['mean_err']:>9.2f} "
          f"{rec['mean_frac_feats']:>15.3f} {str(rec['admissible']):>11}{mark}")

model = fit_sos(train, SosFitConfig(lam=result.chosen_lambda, q=1,
                                    solver="sdaap", seed=11))
labels, _ = predict(model, test.features)
print("\nrefit at chosen lambda, test metrics:",
      evaluate(labels, test.labels, model.B,
               time_seconds=model.diagnostics["fit_seconds"]))
