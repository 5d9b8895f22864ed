import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wbpdecode.settings')
django.setup()
