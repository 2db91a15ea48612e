use docembed_py::docembed_py;
use pyo3::prelude::*;

#[test]
fn module_round_trip() {
    pyo3::append_to_inittab!(docembed_py);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c"
import docembed_py as de
store = de.VectorStore.from_dict({'a': [1.0, 0.0], 'b': [0.0, 2.0], 'c': [1.0, 1.0]})
corpus = de.CorpusStats.from_texts(['a a b', 'b c', 'c a'])
emb, skipped = de.embed([('x', 'a b'), ('y', 'zzz')], store, corpus, form='delta')
assert [d for d, _ in emb] == ['x'] and skipped == [('y', 'empty_document')]
assert abs(sum(v * v for v in emb[0][1]) - 1.0) < 1e-12
assert de.roc_auc([0.3, 0.1, 0.2], [True, False, False]) == 1.0
try:
    de.embed([('x', 'a')], store, corpus, form='mean')
    raise AssertionError('bad form accepted')
except ValueError:
    pass
",
            None,
            None,
        )
        .unwrap();
    });
}
