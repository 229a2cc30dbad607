"""
Tests for the scenario loader, the bundled scenarios and the runner
"""

import pytest

from src.errors import ContextError, DSLSyntaxError, ScenarioError, UndeclaredIdentifierError
from src.scenarios import ScenarioLoader, bundled_scenarios
from src.symred_runner import SymredRunner, strip_timing

BUNDLED = ['heat_quadratic', 'kdv_pair', 'liouville_moutard', 'theorem2_demo', 'utx_family']


@pytest.fixture
def loader(settings):
    return ScenarioLoader(settings)


@pytest.fixture
def runner(settings):
    return SymredRunner(settings=settings)


class TestLoader:

    def test_bundled_listing(self):
        assert list(bundled_scenarios()) == BUNDLED

    @pytest.mark.parametrize('name', BUNDLED)
    def test_bundled_scenarios_load(self, loader, name):
        scenario = loader.load(bundled_scenarios()[name])
        assert scenario.name == name
        assert scenario.requests

    def test_utx_declarations(self, loader):
        scenario = loader.load(bundled_scenarios()['utx_family'])
        assert scenario.context.indep_vars == ['t', 'x']
        assert set(scenario.fields) >= {'K1', 'K2', 'K3', 'K', 'K23'}
        assert scenario.ansatz.reduced_functions == ('phi1', 'phi2')
        assert scenario.numeric['N1'].grid.steps() == 1000
        assert scenario.numeric['N1'].samples == {'t': (0.0, 0.5), 'x': (-2.0, 3.0)}

    def test_request_order(self, loader):
        scenario = loader.load(bundled_scenarios()['theorem2_demo'])
        assert [r.kind for r in scenario.requests] == [
            'check', 'check', 'check', 'invariant', 'verdict', 'verdict']

    def test_syntax_error(self, loader):
        with pytest.raises(DSLSyntaxError) as info:
            loader.loads("indep x;\nconstraint u[x,x] = ;\n")
        assert info.value.line == 2

    def test_undeclared_identifier(self, loader):
        with pytest.raises(UndeclaredIdentifierError):
            loader.loads("indep x;\nfield Q = v*u[x];\n")

    def test_missing_indep(self, loader):
        with pytest.raises(ScenarioError):
            loader.loads("constraint u = 0;\n")

    def test_unknown_field_reference(self, loader):
        with pytest.raises(ScenarioError):
            loader.loads("indep x;\nconstraint u[x,x] = 0;\ncheck Q on constraint;\n")

    def test_duplicate_declaration(self, loader):
        with pytest.raises(ContextError):
            loader.loads("indep x;\nparam a, a;\n")

    def test_ansatz_required(self, loader):
        with pytest.raises(ScenarioError):
            loader.loads("indep t, x;\nconstraint u[x,x] = 0;\nverify ansatz on constraint;\n")

    def test_inconsistent_atom_rule(self, loader):
        text = ("indep x;\nparam p;\natom r: rel r^2 = p - 2*x;\nD[x](r) = 1/r;\n")
        with pytest.raises(ContextError):
            loader.loads(text)

    def test_field_combination(self, loader):
        scenario = loader.loads("indep x;\nfield A = u[x];\nfield B = u;\nfield C = A + 2*B;\n")
        assert str(scenario.fields['C'].characteristic) == str(
            loader.loads("indep x;\nfield C = u[x] + 2*u;\n").fields['C'].characteristic)


class TestRunner:

    @pytest.mark.parametrize('name', BUNDLED)
    def test_bundled_checks_pass(self, runner, name):
        record = runner.run_scenario(bundled_scenarios()[name])
        failures = [(c['index'], c['kind'], c.get('message') or c['outcome'])
                    for c in record['checks'] if not c['success']]
        assert failures == []
        assert record['failed'] == 0

    def test_failed_check_is_recorded(self, runner, loader):
        scenario = loader.loads("indep x;\nconstraint u[x,x] = u[x]^3;\nfield Bad = u;\n"
                                "check Bad on constraint;\n")
        record = runner.run_scenario(scenario)
        check = record['checks'][0]
        assert not check['success']
        assert 'error' not in check
        assert check['outcome']['invariant'] is False
        assert check['outcome']['defects'] == ['-2*u[x]^3']

    def test_request_error_is_recorded(self, runner, loader):
        scenario = loader.loads("indep x;\nunknown c;\nconstraint u[x,x] = 0;\n"
                                "pointfield T = xi(x)=1;\ndetermine T on constraint unknowns c;\n")
        check = runner.run_scenario(scenario)['checks'][0]
        assert not check['success']
        assert check['error'] == 'ScenarioError'
        assert set(check['timing']) == {'seconds', 'memory_delta_mb'}

    def test_kdv_outcomes(self, runner):
        record = runner.run_scenario(bundled_scenarios()['kdv_pair'])
        divisible, independent, using = record['checks']
        assert divisible['outcome']['divisible'] is True
        assert divisible['outcome']['quotients'] == ['1']
        assert divisible['outcome']['c0'] == ['1']
        assert independent['outcome']['independent'] is True
        assert using['outcome']['invariant'] is True

    def test_divisibility_needs_constant_quotient(self, runner, loader):
        scenario = loader.loads("indep x;\nconstraint u[x,x] = u[x]^3;\nfield Bad = u;\n"
                                "check Bad on constraint divisible by u[x]^3;\n"
                                "check Bad on constraint divisible by u[x]^2;\n")
        constant, polynomial = runner.run_scenario(scenario)['checks']
        assert constant['success']
        assert constant['outcome']['c0'] == ['-2']
        assert not polynomial['success']
        assert polynomial['outcome']['c0'] == [None]
        assert polynomial['outcome']['quotients'] == ['-2*u[x]']

    def test_utx_determining_spaces(self, runner):
        record = runner.run_scenario(bundled_scenarios()['utx_family'])
        laurent, quadratic, scaling = [c['outcome'] for c in record['checks'] if c['kind'] == 'determine']
        assert laurent['dimension'] == 2
        assert set(laurent['free_unknowns']) == {'a_m3', 'a_m2'}
        for vector in laurent['basis']:
            nonzero = [name for name, value in vector.items() if value != '0']
            assert len(nonzero) == 1
            assert nonzero[0] in {'a_m3', 'a_m2'}
        assert quadratic['dimension'] == 1
        assert scaling['dimension'] == 0

    def test_verdicts(self, runner):
        record = runner.run_scenario(bundled_scenarios()['theorem2_demo'])
        verdicts = [c['outcome'] for c in record['checks'] if c['kind'] == 'verdict']
        assert [v['verdict'] for v in verdicts] == ['classical-invariant', 'inconclusive']
        assert [v['s'] for v in verdicts] == [3, 2]

    def test_verdict_counts_independent_generators(self, runner, loader):
        scenario = loader.loads("indep t, x;\nequation Heat: u[x,x] = u[t];\nsystem Stationary: u[t] = 0;\n"
                                "pointfield T = xi(t)=1;\npointfield T2 = xi(t)=2;\npointfield X = xi(x)=1;\n"
                                "verdict algebra T, T2, X on Heat system Stationary order 2;\n")
        outcome = runner.run_scenario(scenario)['checks'][0]['outcome']
        assert outcome['generators'] == 3
        assert outcome['s'] == 2
        assert outcome['verdict'] == 'inconclusive'

    def test_verdict_rejects_open_algebra(self, runner, loader):
        scenario = loader.loads("indep t, x;\nequation Heat: u[x,x] = u[t];\nsystem Stationary: u[t] = 0;\n"
                                "pointfield X = xi(x)=1;\npointfield G = eta=x;\n"
                                "verdict algebra X, G on Heat system Stationary order 1;\n")
        check = runner.run_scenario(scenario)['checks'][0]
        assert not check['success']
        assert check['error'] == 'AlgebraClosureError'

    def test_batch_summary(self, runner):
        paths = [bundled_scenarios()['heat_quadratic'], bundled_scenarios()['kdv_pair']]
        report = runner.run_batch(paths)
        assert report['tool'] == 'symred'
        assert report['summary'] == {'scenarios': 2, 'checks': 8, 'passed': 8, 'failed': 0}

    def test_report_is_deterministic(self, settings):
        paths = [bundled_scenarios()['heat_quadratic']]
        first = strip_timing(SymredRunner(settings=settings).run_batch(paths))
        second = strip_timing(SymredRunner(settings=settings).run_batch(paths))
        assert first == second
        assert all('timing' not in c for s in first['scenarios'] for c in s['checks'])
