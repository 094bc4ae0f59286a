"""
Django settings for the concentration project.

Every tunable is read through python-decouple, so it can be overridden from
the environment or a .env file next to manage.py.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config(
    'DJANGO_SECRET_KEY',
    default='django-insecure-3q#n0l8e1k^b7v$z2m@c9r!w4t6y5u&p)s+d(f=g_h%j*x',
)

DEBUG = config('DJANGO_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'bounds',
    'portfolio',
    'experiments',
    'cli',
]

# No persistent storage: the bounds toolkit only reads and writes files.
DATABASES = {}

# REST Framework Configuration
REST_FRAMEWORK = {
    # A flagged zero-probability bound carries log_probability = -inf.
    'STRICT_JSON': False,
    'COERCE_DECIMAL_TO_STRING': False,
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Bounds toolkit
BOUNDS_DEFAULT_SEED = config('BOUNDS_SEED', default='42')
BOUNDS_OUTPUT_FORMAT = config('BOUNDS_OUTPUT_FORMAT', default='table')
LAMBERTW_RELATIVE_TOLERANCE = config('LAMBERTW_RELATIVE_TOLERANCE', default=1e-12, cast=float)
LAMBERTW_MAX_ITERATIONS = config('LAMBERTW_MAX_ITERATIONS', default=100, cast=int)
EXPERIMENT_MAX_REJECTIONS = config('EXPERIMENT_MAX_REJECTIONS', default=1000, cast=int)


# Logging
BOUNDS_LOG_LEVEL = config('BOUNDS_LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': BOUNDS_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('bounds', 'portfolio', 'experiments', 'cli')
    },
}


# Celery Configuration
# Eager by default: --parallel runs in-process unless a broker is configured.
CELERY_BROKER_URL = config('REDIS_URL', default='memory://')
CELERY_RESULT_BACKEND = config('REDIS_URL', default='cache+memory://')
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
