# Web应用模块


