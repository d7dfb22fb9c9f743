__module_name__ = "app"
