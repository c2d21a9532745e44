"""Critical point data: t_c, multipliers and the two density exponents."""

import json

from dhl.dynamics import critical_exponents, critical_point_report

r = critical_point_report()
sh, sv = critical_exponents(r)
print(json.dumps({"t_c": r.location.t, "lambda_u": r.lambda_u, "lambda_c": r.lambda_c,
                  "chi_u": r.chi_u, "chi_c": r.chi_c, "sigma_h": sh, "sigma_v": sv}, indent=1))
