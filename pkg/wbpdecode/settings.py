"""
wbpdecode Django Settings
Configuration for the weighted-BP training and evaluation toolkit
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(os.path.join(BASE_DIR, '.env'))

# Security (no web surface, but Django requires a key)
SECRET_KEY = os.getenv('SECRET_KEY', 'wbpdecode-offline-key')
DEBUG = os.getenv('DEBUG', 'False') == 'True'
ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third-party apps
    'rest_framework',

    # Local apps
    'core',
    'codes',
    'decoding',
    'sampling',
    'training',
    'active',
    'evaluation',
]

# Local development: SQLite (nothing in the toolkit touches the database)
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# wbpdecode Configuration
WBPDECODE_CONFIG = {
    'WORKERS': int(os.getenv('WBPDECODE_WORKERS', os.cpu_count() or 1)),
    'MAX_BLOCKS': int(os.getenv('WBPDECODE_MAX_BLOCKS', 100_000_000)),
    'MIN_BLOCK_ERRORS': int(os.getenv('WBPDECODE_MIN_BLOCK_ERRORS', 100)),
    'CHUNK_BLOCKS': int(os.getenv('WBPDECODE_CHUNK_BLOCKS', 10_000)),
    'EPSILON_TAIL': 1e-6,
    'TAIL_EXTEND': 5,
    'MESSAGE_CLIP': 10.0,
    'ITERATIONS': 5,
    'RMSPROP_DECAY': 0.99,
    'RMSPROP_EPSILON': 1e-8,
    'RUNS_ROOT': Path(os.getenv('WBPDECODE_RUNS_ROOT', BASE_DIR / 'runs')),
}

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': os.getenv('DJANGO_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'wbpdecode': {
            'handlers': ['console'],
            'level': os.getenv('WBPDECODE_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
