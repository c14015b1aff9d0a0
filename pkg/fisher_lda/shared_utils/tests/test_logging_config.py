# fisher_lda/shared_utils/tests/test_logging_config.py
import tempfile
from pathlib import Path
from unittest import TestCase, mock

from fisher_lda.shared_utils.logging_config import build_logging_config, setup_logging


class LoggingConfigTestCase(TestCase):

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.log_dir = Path(self.temp_dir.name) / "logs"

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_levels(self):
        config = build_logging_config(self.log_dir)
        self.assertEqual(config['root']['level'], 'INFO')
        self.assertEqual(config['handlers']['error_file']['level'], 'ERROR')
        self.assertEqual(build_logging_config(self.log_dir, debug_mode=True)['handlers']['console']['level'], 'DEBUG')

    def test_files_below_log_dir(self):
        handlers = build_logging_config(self.log_dir)['handlers']
        self.assertEqual(handlers['app_file']['filename'], str(self.log_dir / 'app.log'))
        self.assertEqual(handlers['error_file']['filename'], str(self.log_dir / 'error.log'))

    @mock.patch('fisher_lda.shared_utils.logging_config.logging.config.dictConfig')
    def test_setup_creates_directory(self, mock_dict_config):
        self.assertEqual(setup_logging(self.log_dir), self.log_dir)
        self.assertTrue(self.log_dir.is_dir())
        mock_dict_config.assert_called_once()
        self.assertEqual(mock_dict_config.call_args[0][0]['root']['level'], 'INFO')
