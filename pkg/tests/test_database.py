from unittest import TestCase

from database.models import DatabaseManager, make_run_id

CONFIG = {"family": {"P": [["0", "1"], [], ["1"]]}, "seed": 0}


class TestRunIds(TestCase):

    def test_reproducible(self):
        self.assertEqual(make_run_id("find-params", CONFIG, 0), make_run_id("find-params", dict(CONFIG), 0))

    def test_seed_changes_id(self):
        self.assertNotEqual(make_run_id("find-params", CONFIG, 0), make_run_id("find-params", CONFIG, 1))


class TestDatabaseManager(TestCase):

    def setUp(self):
        self.db = DatabaseManager("sqlite://")

    def test_store_and_get(self):
        run_id = self.db.create_run("find-params", CONFIG, 0, {"count": 2})
        self.db.store_rows(run_id, [{"lambda": "0", "kind": "rational", "status": "preperiodic"},
                                    {"lambda": "-1", "kind": "rational", "height_estimate": "0.5"}])
        run = self.db.get_run(run_id)
        self.assertEqual(run["summary"], {"count": 2})
        self.assertEqual([r["lambda"] for r in run["rows"]], ["0", "-1"])
        self.assertEqual(run["rows"][1]["height_estimate"], 0.5)
        self.assertIsNone(run["rows"][0]["height_estimate"])

    def test_rerun_replaces_previous_record(self):
        first = self.db.create_run("orbit", CONFIG, 0)
        self.db.store_rows(first, [{"lambda": "1"}])
        second = self.db.create_run("orbit", CONFIG, 0)
        self.assertEqual(first, second)
        self.assertEqual(len(self.db.list_runs()), 1)
        self.assertEqual(self.db.get_run(second)["rows"], [])

    def test_list_filters_by_command(self):
        self.db.create_run("orbit", CONFIG, 0)
        self.db.create_run("height", CONFIG, 0)
        self.assertEqual([r["command"] for r in self.db.list_runs("height")], ["height"])

    def test_delete(self):
        run_id = self.db.create_run("orbit", CONFIG, 0)
        self.assertTrue(self.db.delete_run(run_id))
        self.assertFalse(self.db.delete_run(run_id))
        self.assertIsNone(self.db.get_run(run_id))

    def test_rows_need_a_run(self):
        with self.assertRaises(ValueError):
            self.db.store_rows("missing", [{"lambda": "0"}])
