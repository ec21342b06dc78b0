use pyo3::prelude::*;
use pyo3::types::PyDict;

use gmla::gmla as gmla_module;

fn run(code: &str) -> PyResult<()> {
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("gmla", py.import("gmla")?)?;
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None)
    })
}

#[test]
fn bindings_from_python() {
    pyo3::append_to_inittab!(gmla_module);
    Python::initialize();
    run(r#"
import math
g = gmla.Grid(n=128, half_width=12.0)
assert g.n == 128
u = gmla.Signal("hermite(2)")
inv, en = gmla.moyal(u, g)
assert inv < 1e-6 and en < 1e-6
a = gmla.Symbol("x")
out = gmla.apply(a, u, "weyl", g)
xs = g.xs()
s = u.sample(g)
assert max(abs(o - x * v) for o, x, v in zip(out, xs, s)) < 1e-9
m = gmla.weyl_matrix(gmla.Symbol("1"), g)
assert abs(m[3][3] - 1) < 1e-9 and abs(m[3][4]) < 1e-9
assert abs(gmla.qnorm(gmla.Signal("gauss(0, 0)"), 0.0, "stft-weighted", g) - math.sqrt(2 * math.pi)) < 1e-6
t = str(gmla.Signal("chirp(2)"))
assert t.startswith("chirp(") and str(gmla.Signal(t)) == t
"#)
    .unwrap();
    let err = run("gmla.Symbol('bracket(')").unwrap_err();
    Python::attach(|py| assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py)));
    let err = run("gmla.check('nonsense', gmla.Signal('delta'))").unwrap_err();
    Python::attach(|py| assert!(err.is_instance_of::<pyo3::exceptions::PyRuntimeError>(py)));
}
