import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'concentration.settings')
django.setup()
